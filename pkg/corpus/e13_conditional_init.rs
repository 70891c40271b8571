fn main(flag: bool) -> i32 {
    let x: i32;
    if flag {
        x = 1;
    }
    x
}
