fn main() -> i32 {
    let b = Box::new(1);
    let mut i = 0;
    while i < 3 {
        let c = b;
        i = i + 1;
    }
    0
}
