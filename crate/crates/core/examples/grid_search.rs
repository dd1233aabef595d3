//! ε × K grid for T3P on the surrogate, written as CSV and SVG.

use t3p_dbs::bench::{grid_search, heatmap_svg, write_heatmap_csv, write_svg, ExperimentConfig, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("t3p-grid");
    std::fs::create_dir_all(&out)?;
    let map = grid_search(&GridSpec::default(), &ExperimentConfig::default())?;
    for &k in &map.k_values {
        let row: Vec<String> =
            map.cells.iter().filter(|c| c.k == k).map(|c| format!("{:7.2}", c.mean_cumulative_reward)).collect();
        println!("K={k:>2} {}", row.join(" "));
    }
    let best = map.best();
    println!("best: epsilon {} K {}", best.epsilon, best.k);
    write_heatmap_csv(&map, out.join("heatmap.csv"))?;
    write_svg(&heatmap_svg(&map, "T3P mean cumulative reward"), out.join("heatmap.svg"))?;
    println!("wrote {}", out.display());
    Ok(())
}
