use polycode::polycode::{compute_capacity, CodeWidth};

fn main() -> polycode::Result<()> {
    for width in [CodeWidth::W32, CodeWidth::W64] {
        for (n, s) in [(320, 10), (320, 12), (1000, 20)] {
            let r = compute_capacity(n, s, width)?;
            let limit = if r.width_limited() { "width" } else { "network" };
            println!("N={n:<5} S={s:<3} w={width}: {} codes, {limit}-limited", r.theoretical_capacity);
        }
    }
    Ok(())
}
