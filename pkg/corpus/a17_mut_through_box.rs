fn main() -> i32 {
    let mut b = Box::new(1);
    *b = *b + 41;
    *b
}
