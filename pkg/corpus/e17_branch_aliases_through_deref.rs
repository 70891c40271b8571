// on any one path r and s never alias x at the same time
fn main(c: bool) -> i32 {
    let mut x = 1;
    let mut y = 2;
    let z = 3;
    let mut r = &mut y;
    let mut s = &z;
    if c {
        r = &mut x;
    } else {
        s = &x;
    }
    *r = 5;
    *s
}
