fn take(r: &Box<i32>) -> Box<i32> {
    *r
}

fn main() -> i32 {
    let b = Box::new(1);
    let c = take(&b);
    *c
}
