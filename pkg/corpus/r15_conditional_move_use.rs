fn main() -> i32 {
    let b = Box::new(1);
    let flag = 1 < 2;
    if flag {
        let c = b;
    }
    *b
}
