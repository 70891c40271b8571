// a fresh `x` every iteration: one assignment per storage lifetime
fn main() -> i32 {
    let mut sum = 0;
    let mut i = 0;
    while i < 3 {
        let x: i32;
        x = i * 2;
        sum = sum + x;
        i = i + 1;
    }
    sum
}
