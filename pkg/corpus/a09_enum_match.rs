enum Opt {
    None,
    Some(i32),
}

fn unwrap_or(o: Opt, d: i32) -> i32 {
    match o {
        Opt::Some(v) => {
            return v;
        }
        Opt::None => {
            return d;
        }
    }
}

fn main() -> i32 {
    let a = Opt::Some(4);
    let b = Opt::None;
    unwrap_or(a, 0) + unwrap_or(b, 3)
}
