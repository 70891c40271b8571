fn main() -> i32 {
    let b = Box::new(Box::new(7));
    let inner = *b;
    *inner
}
