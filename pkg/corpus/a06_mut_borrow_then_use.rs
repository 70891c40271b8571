fn main() -> i32 {
    let mut x = 1;
    let r = &mut x;
    *r = 5;
    // r is dead here, so reading x is fine
    x + 1
}
