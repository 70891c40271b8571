fn main() -> i32 {
    let b = Box::new(5);
    let c = b;
    *c
}
