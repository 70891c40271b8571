fn main() -> i32 {
    let r: &i32;
    {
        let x = 5;
        r = &x;
    }
    *r
}
