fn main() -> i32 {
    let x = 5;
    let r1 = &x;
    let r2 = &x;
    *r1 + *r2
}
