fn main(flag: bool) -> i32 {
    let b = Box::new(3);
    let mut out = 1;
    if flag {
        out = 2;
    } else {
        let c = b;
        out = *c;
    }
    out
}
