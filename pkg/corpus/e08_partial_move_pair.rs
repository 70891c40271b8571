struct Pair {
    a: Box<i32>,
    b: Box<i32>,
}

fn main() -> i32 {
    let p = Pair { a: Box::new(1), b: Box::new(2) };
    let x = p.a;
    *x
}
