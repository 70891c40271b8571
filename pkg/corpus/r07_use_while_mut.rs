fn main() -> i32 {
    let mut x = 1;
    let a = &mut x;
    let y = x;
    *a = 2;
    y
}
