fn main() -> i32 {
    let b = Box::new(5);
    let mut out = 0;
    let flag = 1 < 2;
    if flag {
        let c = b;
        out = *c;
    }
    out
}
