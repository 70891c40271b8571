fn bump(r: &mut i32) {
    *r = *r + 1;
}

fn main() -> i32 {
    let mut x = 0;
    let r = &mut x;
    // each call reborrows *r, so r stays usable
    bump(r);
    bump(r);
    *r
}
