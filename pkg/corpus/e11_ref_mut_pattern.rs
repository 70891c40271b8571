enum Opt {
    None,
    Some(i32),
}

fn main() -> i32 {
    let mut o = Opt::Some(1);
    match o {
        Opt::Some(ref mut v) => {
            *v = *v + 1;
        }
        Opt::None => {}
    }
    let mut out = 0;
    match o {
        Opt::Some(v) => {
            out = v;
        }
        _ => {}
    }
    out
}
