fn main() -> i32 {
    let x: i32;
    x = 1;
    x = 2;
    x
}
