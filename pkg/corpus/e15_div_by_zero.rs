// arithmetic errors are outside borrow checking; this traps at run time
fn main(d: i32) -> i32 {
    let b = Box::new(10);
    *b / d
}
