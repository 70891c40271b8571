fn id(x: &i32) -> &i32 {
    x
}

fn main() -> i32 {
    let a = 9;
    let r = id(&a);
    *r
}
