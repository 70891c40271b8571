fn main() -> i32 {
    let mut b = Box::new(1);
    // the old box is freed before the new one is stored
    b = Box::new(2);
    *b
}
