fn main() -> i32 {
    let mut x = 1;
    let r = &mut x;
    if *r > 0 {
        *r = 2;
    }
    x
}
