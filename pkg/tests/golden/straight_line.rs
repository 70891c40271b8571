fn main() -> i32 {
    let x = 1;
    x + 2
}
