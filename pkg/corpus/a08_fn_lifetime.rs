fn first<'a>(x: &'a i32, y: &'a i32) -> &'a i32 {
    x
}

fn main() -> i32 {
    let a = 1;
    let b = 2;
    let r = first(&a, &b);
    *r
}
