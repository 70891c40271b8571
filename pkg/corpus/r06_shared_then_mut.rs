fn main() -> i32 {
    let mut x = 1;
    let a = &x;
    let b = &mut x;
    *b = 2;
    *a
}
