fn main() -> i32 {
    let b = Box::new(1);
    let r = &b;
    let c = b;
    **r
}
