fn main() -> i32 {
    let b = Box::new(40);
    let c = *b + 2;
    c
}
