// Two overlapping discs: distance-transform basin depths, the watershed
// split, and the nearest-seed rule for contested pixels.

use gpseg::segmentation::{distance_transform, nearest_seed, watershed};
use gpseg::synthetic::{render_objects, ObjectShape, PhantomObject};

pub fn run_example() -> gpseg::Result<()> {
    // Squared radii in [197, 200) and [200, 202) put the nearest background
    // pixel of each centre at sqrt(200) and sqrt(202).
    let a = PhantomObject::disc((30.0, 25.0), 14.1, 1.0);
    let b = PhantomObject::disc((30.0, 50.0), 14.16, 1.0);
    let ph = render_objects(60, 76, &[a, b], ObjectShape::Disc, |_, _| 0.0);
    let fg = ph.labels.foreground();
    let dist = distance_transform(&fg);
    println!("basin depths: {:.2} and {:.2}", dist.get(30, 25), dist.get(30, 50));

    let labels = watershed(&dist);
    let areas = labels.areas();
    println!("{} labels, areas {:?}", labels.num_objects(), &areas[1..]);
    let row: String = (0..76).map(|j| char::from(b'0' + labels.get(30, j) as u8)).collect();
    println!("row 30: {row}");

    // A contested pixel goes to the closer seed.
    let seeds = [(1, (0.0, 0.0)), (2, (10.63, 0.0))];
    println!("pixel at 5.62 / 5.01 from the seeds -> label {}", nearest_seed((5.62, 0.0), &seeds));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
