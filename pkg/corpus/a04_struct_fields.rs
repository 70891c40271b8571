struct Point {
    x: i32,
    y: i32,
}

fn main() -> i32 {
    let mut p = Point { x: 1, y: 2 };
    p.x = 10;
    p.x + p.y
}
