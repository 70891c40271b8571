// division truncates toward zero; remainder takes the dividend's sign
fn main() -> i32 {
    let a = -7;
    let b = 2;
    a / b * 10 + a % b
}
