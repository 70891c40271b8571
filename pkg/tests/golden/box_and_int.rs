fn main() -> i32 {
    let n = 3;
    let b = Box::new(n);
    *b + n
}
