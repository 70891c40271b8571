fn shorten<'a, 'b: 'a, 'c: 'b>(x: &'c i32) -> &'a i32 {
    x
}

fn main() -> i32 {
    let v = 4;
    let r = shorten(&v);
    *r
}
