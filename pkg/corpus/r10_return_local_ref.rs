fn dangle() -> &i32 {
    let x = 1;
    &x
}

fn main() -> i32 {
    let r = dangle();
    *r
}
