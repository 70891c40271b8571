fn main() -> i32 {
    let mut x = 0;
    let mut i = 0;
    while i < 5 {
        let r = &mut x;
        *r = *r + i;
        i = i + 1;
    }
    x
}
