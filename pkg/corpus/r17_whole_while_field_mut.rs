struct Point {
    x: i32,
    y: i32,
}

fn main() -> i32 {
    let mut p = Point { x: 1, y: 2 };
    let a = &mut p.x;
    let q = &p;
    *a = 3;
    q.y
}
