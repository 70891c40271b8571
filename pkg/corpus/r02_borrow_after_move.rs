fn main() -> i32 {
    let b = Box::new(1);
    let c = b;
    let r = &b;
    0
}
