fn main() -> i32 {
    let mut x = 1;
    let r = &x;
    let y = *r;
    // r's last use was above, so the loan is no longer live
    x = 2;
    x + y
}
