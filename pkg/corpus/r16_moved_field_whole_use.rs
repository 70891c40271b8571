struct Node {
    val: i32,
    next: Box<i32>,
}

fn main() -> i32 {
    let n = Node { val: 1, next: Box::new(2) };
    let b = n.next;
    let m = n;
    *b
}
