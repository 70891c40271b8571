fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 {
    y
}

fn main() -> i32 {
    let a = 1;
    let b = 2;
    let r = pick(&a, &b);
    *r
}
