struct Point {
    x: i32,
    y: i32,
}

fn get_x<'a>(p: &'a Point) -> &'a i32 {
    &p.x
}

fn main() -> i32 {
    let p = Point { x: 8, y: 9 };
    let r = get_x(&p);
    *r
}
