fn main() -> i32 {
    let mut x = 1;
    let mut y = 2;
    let mut r = &mut x;
    let s = &mut *r;
    // overwriting r does not touch what s borrowed through it
    r = &mut y;
    *s = 5;
    *r = 6;
    x + y
}
