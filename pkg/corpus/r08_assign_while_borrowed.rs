fn main() -> i32 {
    let mut x = 1;
    let r = &x;
    x = 2;
    *r
}
