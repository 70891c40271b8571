fn main() -> i32 {
    let b = Box::new(Box::new(7));
    let c = *b;
    *c
}
