fn main() -> i32 {
    let x: i32;
    x + 1
}
