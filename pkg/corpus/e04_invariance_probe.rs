// &mut T is invariant in T: storing &y into r ties r's region to y's scope
fn store<'a>(slot: &mut &'a i32, v: &'a i32) {
    *slot = v;
}

fn main() -> i32 {
    let x = 1;
    let mut r: &i32 = &x;
    {
        let y = 2;
        store(&mut r, &y);
    }
    *r
}
