fn two(a: &mut i32, b: &mut i32) {
    *a = *a + 1;
    *b = *b + 1;
}

fn main() -> i32 {
    let mut x = 1;
    two(&mut x, &mut x);
    x
}
