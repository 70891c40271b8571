fn main() -> i32 {
    let b = Box::new(1);
    let c = b;
    *b
}
