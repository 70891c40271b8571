fn main(c: bool) -> i32 {
    let mut x = 0;
    if c {
        x = 1;
    } else {
        x = 2;
    }
    x
}
