fn main(flag: bool) -> i32 {
    let b = Box::new(3);
    let mut out = 1;
    if flag {
        let c = b;
        out = *c;
    } else {
        out = 2;
    }
    out
}
