fn main() -> i32 {
    let mut b = Box::new(1);
    let r = &*b;
    b = Box::new(2);
    *r
}
