//! The same three pre-synaptic tags arriving in every possible order give
//! six different codes.

use polycode::polycode::{apply_tag, CodeWidth, TagSet};

fn main() {
    let width = CodeWidth::W32;
    let tags = TagSet::generate(4, width, 42).expect("four tags fit");
    let post = tags.get(3);
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for order in orders {
        let code = order.iter().fold(post, |c, &pre| apply_tag(c, tags.get(pre), width));
        println!("arrival {order:?} -> {code:#010x}");
    }
    println!("a lone tag: {:#010x}", apply_tag(post, tags.get(0), width));
}
