//! Builds the desk and large topologies and prints each node's role, betweenness and
//! resources.
//!
//! cargo run --example topology [-- <nodes> <attachment> <seed>]

use fogforge::config::ExperimentConfig;
use fogforge::topology::{betweenness, build_topology, FogTopology, TopologyParams};

fn show(name: &str, topo: &FogTopology) -> fogforge::Result<()> {
    let scores = betweenness(&topo.graph())?;
    println!(
        "{name}: {} nodes, {} links, cloud {}, fog {:?}, clusters {:?}",
        topo.nodes().len(),
        topo.links().len(),
        topo.cloud(),
        topo.fog_nodes(),
        topo.clusters()
    );
    for (node, score) in topo.nodes().iter().zip(&scores) {
        println!(
            "  node {:>2} {:<14} betweenness {score:>5.2} ipt {:>6.0} ram {}",
            node.id,
            format!("{:?}", node.role),
            node.ipt,
            node.ram
        );
    }
    for &fog in topo.fog_nodes() {
        println!("  fog {fog} serves {} cluster(s)", topo.cluster_count(fog));
    }
    Ok(())
}

fn main() -> fogforge::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if let [nodes, attachment, seed] = args[..] {
        let params = TopologyParams {
            nodes,
            attachment,
            seed: seed as u64,
            ..TopologyParams::default()
        };
        return show("custom", &build_topology(&params)?);
    }
    show("desk", &ExperimentConfig::desk().build_topology()?)?;
    println!();
    show("large", &ExperimentConfig::large().build_topology()?)
}
