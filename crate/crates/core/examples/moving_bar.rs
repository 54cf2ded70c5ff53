//! Renders one cycle of a moving bar, prints it and writes PGM frames.
//!
//! ```text
//! cargo run --release --example moving_bar -- 3 /tmp/bar
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use polycode::stimulus::{render_frame, BarGeometry, DirectionId, GRID};

fn main() -> polycode::Result<()> {
    let mut args = std::env::args().skip(1);
    let index: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let out: Option<PathBuf> = args.next().map(PathBuf::from);
    let dir = DirectionId::new(index).ok_or_else(|| polycode::Error::Input(format!("direction {index} not in 0..8")))?;
    let geometry = BarGeometry { width: 2, speed: 1 };

    for phase in 0..4 {
        let frame = render_frame(dir, phase, &geometry);
        println!("{dir}, phase {phase}:");
        for r in 0..GRID {
            let line: String = (0..GRID).map(|c| if frame.get(r, c) > 0.0 { '#' } else { '.' }).collect();
            println!("  {line}");
        }
    }

    if let Some(out) = out {
        std::fs::create_dir_all(&out)?;
        for phase in 0..geometry.period_frames() {
            let path = out.join(format!("{}_{phase:02}.pgm", dir.angle_deg()));
            render_frame(dir, phase, &geometry).write_pgm(BufWriter::new(File::create(path)?))?;
        }
        println!("wrote {} frames to {}", geometry.period_frames(), out.display());
    }
    Ok(())
}
