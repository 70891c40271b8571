fn main(c: bool) -> i32 {
    let b = Box::new(1);
    if c {
        let d = b;
    }
    0
}
