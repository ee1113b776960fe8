//! Builds a small tree from explicit cuts and answers distance, meet,
//! projection and truncation queries; prints the DOT graph at the end.
//!
//! ```text
//! cargo run --release --example tree_queries
//! ```

use icrt::rtree::{to_dot, IcrtTree};

fn main() -> icrt::Result<()> {
    let y = [1.0, 2.5, 3.0, 4.5, 6.0];
    let z = [0.4, 1.7, 0.9, 2.8];
    let tree = IcrtTree::from_cuts(&y, &z)?;
    println!("{} segments, total length {}", tree.segments(), tree.total_length());
    for k in 0..tree.segments() {
        println!(
            "  segment {} ({}, {}] parent {:?} glued at {:?} depth of glue {}",
            k + 1,
            tree.seg_start(k),
            tree.ends()[k],
            tree.parent(k).map(|p| p + 1),
            tree.parent(k).map(|_| tree.glue()[k]),
            tree.attach_depth(k)
        );
    }
    let pairs = [(0.5, 2.0), (2.8, 5.5), (4.0, 1.2), (3.0, 6.0)];
    for (a, b) in pairs {
        let (pa, pb) = (tree.point(a)?, tree.point(b)?);
        let m = tree.meet(pa, pb);
        println!("d({a}, {b}) = {:.3}  meet at {:.3}  depths {:.3} {:.3}", tree.distance(pa, pb), m.coord, tree.depth(pa), tree.depth(pb));
    }
    for l in [1.0, 2.5, 4.5] {
        let p = tree.point(5.5)?;
        println!(
            "project 5.5 to level {l}: {:.3}, distance {:.3}",
            tree.project(p, l)?.coord,
            tree.distance_to_truncation(p, l)?
        );
    }
    println!("Hausdorff distance between levels 2.5 and 6: {:.3}", tree.hausdorff_truncation(2.5, 6.0)?);
    println!("\n{}", to_dot(&tree.skeleton(tree.total_length())?));
    Ok(())
}
