enum List {
    Nil,
    Cons(i32, Box<List>),
}

fn sum(l: &List) -> i32 {
    match *l {
        List::Nil => {
            return 0;
        }
        List::Cons(v, ref rest) => {
            return v + sum(&**rest);
        }
    }
}

fn main() -> i32 {
    let l = List::Cons(1, Box::new(List::Cons(2, Box::new(List::Nil))));
    sum(&l)
}
