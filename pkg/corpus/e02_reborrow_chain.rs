fn main() -> i32 {
    let mut x = 1;
    let r1 = &mut x;
    let r2 = &mut *r1;
    *r2 = 5;
    *r1 = *r1 + 1;
    x
}
