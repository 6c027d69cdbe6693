//! Generate a connected Erdős–Rényi graph, inspect its algebra, and round-trip
//! the edge-list text format.
//!
//! ```sh
//! cargo run --example random_graph
//! ```

use afba_consensus::graph::{erdos_renyi, Graph, SPECTRAL_MAX_ITER, SPECTRAL_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = erdos_renyi(50, 0.05, 42)?;
    println!(
        "G(50, 0.05) seed 42: {} edges, max degree {}, connected: {}",
        graph.num_edges(),
        graph.max_degree(),
        graph.is_connected()
    );

    let lap = graph.laplacian();
    let b = graph.incidence_matrix();
    let bbt = b.dot(&b.t());
    println!("Laplacian equals B*B^T exactly: {}", lap == bbt);

    let estimate = graph.laplacian_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER, 0)?;
    println!(
        "||Laplacian|| ~ {:.6} ({} power iterations); degree bounds [{}, {}]",
        estimate.value,
        estimate.iterations,
        graph.max_degree(),
        2 * graph.max_degree()
    );

    let path = std::env::temp_dir().join("afba_example_graph.txt");
    graph.save_edge_list(&path)?;
    let reloaded = Graph::load_edge_list(&path)?;
    println!("edge-list round trip identical: {}", reloaded == graph);
    println!("edge list written to {}", path.display());
    Ok(())
}
