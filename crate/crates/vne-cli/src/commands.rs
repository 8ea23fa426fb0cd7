//! Command implementations: generation, simulation, one-shot embedding,
//! and report regeneration. All file outputs are written atomically
//! (temp file in the target directory, then rename).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use vne_core::partition::generate_dc_set;
use vne_core::pso::{embed_eapso, RejectReason};
use vne_core::sim::{
    greedy_embed, metrics_from_log, run_simulation, EmbedderKind, EmbeddingRecord, MetricsSeries,
    RunMeta, SimParams, SimReport, SimTarget, VnrLogEntry,
};
use vne_core::topology::{
    generate_waxman_substrate, generate_workload, read_substrate_brite, read_virtual_brite,
    write_substrate_brite, write_virtual_brite, Vnr,
};

use crate::config::ExperimentConfig;
use crate::CliError;

/// The workload generator's seed is derived from the experiment seed so
/// that `generate` + simulate-from-files equals simulate-in-memory.
fn workload_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

/// Stdout may be a closed pipe (`vne report | head`); never panic on it.
fn emit(text: &str) {
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {}", tmp.display(), e)))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::input(format!("cannot rename into {}: {}", path.display(), e)))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {}", dir.display(), e)))
}

#[derive(Serialize, Deserialize)]
struct WorkloadRow {
    vnr_id: u64,
    arrival: f64,
    lifetime: f64,
    file: String,
}

pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let profiles = config.profiles();
    let substrate = generate_waxman_substrate(
        config.substrate.nodes,
        config.substrate.links,
        config.substrate.bw_low,
        config.substrate.bw_high,
        &profiles,
        config.seed,
    )?;
    write_atomic(
        &out.join("substrate.brite"),
        write_substrate_brite(&substrate).as_bytes(),
    )?;

    let w = &config.workload;
    let workload = generate_workload(
        w.requests,
        w.arrival_rate,
        w.lifetime_low,
        w.lifetime_high,
        w.size_low,
        w.size_high,
        &w.vn_params(),
        workload_seed(config.seed),
    )?;
    let mut index = csv::Writer::from_writer(Vec::new());
    for vnr in &workload {
        let file = format!("vn_{:05}.brite", vnr.id);
        write_atomic(
            &out.join(&file),
            write_virtual_brite(&vnr.graph)?.as_bytes(),
        )?;
        index
            .serialize(WorkloadRow {
                vnr_id: vnr.id,
                arrival: vnr.arrival_time,
                lifetime: vnr.lifetime,
                file,
            })
            .map_err(|e| CliError::input(format!("workload index: {}", e)))?;
    }
    let bytes = index
        .into_inner()
        .map_err(|e| CliError::input(e.to_string()))?;
    write_atomic(&out.join("workload.csv"), &bytes)?;
    emit(&format!(
        "wrote substrate.brite ({} nodes, {} links), {} virtual networks, workload.csv to {}\n",
        substrate.node_count(),
        substrate.link_count(),
        workload.len(),
        out.display()
    ));
    Ok(())
}

fn load_workload(index_path: &Path) -> Result<Vec<Vnr>, CliError> {
    let mut reader = csv::Reader::from_path(index_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {}", index_path.display(), e)))?;
    let base = index_path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for row in reader.deserialize::<WorkloadRow>() {
        let row = row.map_err(|e| CliError::input(format!("{}: {}", index_path.display(), e)))?;
        let vn_path = base.join(&row.file);
        let text = fs::read_to_string(&vn_path)
            .map_err(|e| CliError::input(format!("cannot read {}: {}", vn_path.display(), e)))?;
        let graph = read_virtual_brite(&text)?;
        out.push(Vnr::new(row.vnr_id, graph, row.arrival, row.lifetime)?);
    }
    Ok(out)
}

fn build_target(
    config: &ExperimentConfig,
    kind: EmbedderKind,
    seed: u64,
) -> Result<SimTarget, CliError> {
    let profiles = config.profiles();
    match kind {
        EmbedderKind::Distributed => {
            if config.input.is_some() {
                return Err(CliError::input(
                    "distributed mode generates its data centers; [input] files are not supported"
                        .into(),
                ));
            }
            let d = &config.distributed;
            Ok(SimTarget::Multi(generate_dc_set(
                d.dc_count,
                d.nodes_per_dc,
                d.links_per_dc,
                config.substrate.bw_low,
                config.substrate.bw_high,
                d.inter_bw_low,
                d.inter_bw_high,
                &profiles,
                seed,
            )?))
        }
        _ => {
            if let Some(input) = &config.input {
                let text = fs::read_to_string(&input.substrate).map_err(|e| {
                    CliError::input(format!("cannot read {}: {}", input.substrate.display(), e))
                })?;
                Ok(SimTarget::Single(read_substrate_brite(&text, &profiles)?))
            } else {
                Ok(SimTarget::Single(generate_waxman_substrate(
                    config.substrate.nodes,
                    config.substrate.links,
                    config.substrate.bw_low,
                    config.substrate.bw_high,
                    &profiles,
                    seed,
                )?))
            }
        }
    }
}

fn build_workload(config: &ExperimentConfig, seed: u64) -> Result<Vec<Vnr>, CliError> {
    if let Some(input) = &config.input {
        load_workload(&input.workload)
    } else {
        let w = &config.workload;
        Ok(generate_workload(
            w.requests,
            w.arrival_rate,
            w.lifetime_low,
            w.lifetime_high,
            w.size_low,
            w.size_high,
            &w.vn_params(),
            workload_seed(seed),
        )?)
    }
}

fn metrics_csv(series: &MetricsSeries) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for bucket in &series.buckets {
        writer
            .serialize(bucket)
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::input(e.to_string()))
}

fn log_jsonl(meta: &RunMeta, log: &[VnrLogEntry]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, meta).map_err(|e| CliError::input(e.to_string()))?;
    out.push(b'\n');
    for entry in log {
        serde_json::to_writer(&mut out, entry).map_err(|e| CliError::input(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    arrived: usize,
    accepted: usize,
    acceptance: f64,
    total_energy: f64,
    total_revenue: f64,
    total_cost: f64,
    wall_s: f64,
}

fn summarize(report: &SimReport, seed: u64, wall_s: f64) -> SeedSummary {
    let accepted: Vec<&VnrLogEntry> = report.log.iter().filter(|e| e.accepted).collect();
    SeedSummary {
        seed,
        arrived: report.log.len(),
        accepted: accepted.len(),
        acceptance: if report.log.is_empty() {
            0.0
        } else {
            accepted.len() as f64 / report.log.len() as f64
        },
        total_energy: accepted.iter().map(|e| e.energy).sum(),
        total_revenue: accepted.iter().map(|e| e.revenue).sum(),
        total_cost: accepted.iter().map(|e| e.cost).sum(),
        wall_s,
    }
}

pub fn cmd_simulate(
    config: &ExperimentConfig,
    kind: EmbedderKind,
    seeds: u32,
    out: &Path,
) -> Result<(), CliError> {
    if seeds == 0 {
        return Err(CliError::input("--seeds must be at least 1".into()));
    }
    ensure_dir(out)?;
    let params = SimParams {
        swarm: config.embedder.swarm_params()?,
        bucket_width: config.bucket_width,
        strict_checks: false,
    };
    let mut summaries = Vec::new();
    for k in 0..seeds {
        let seed = config.seed.wrapping_add(k as u64);
        let target = build_target(config, kind, seed)?;
        let workload = build_workload(config, seed)?;
        let started = Instant::now();
        let report = run_simulation(target, &workload, kind, &params, seed)?;
        let wall = started.elapsed().as_secs_f64();
        let metrics_path = out.join(format!("metrics_{}_seed{}.csv", kind, seed));
        write_atomic(&metrics_path, &metrics_csv(&report.metrics)?)?;
        let log_path = out.join(format!("log_{}_seed{}.jsonl", kind, seed));
        write_atomic(&log_path, &log_jsonl(&report.meta, &report.log)?)?;
        let summary = summarize(&report, seed, wall);
        emit(&format!(
            "seed {}: accepted {}/{} ({:.1}%), energy {:.0}, revenue {:.0}, {:.1}s -> {}, {}\n",
            seed,
            summary.accepted,
            summary.arrived,
            100.0 * summary.acceptance,
            summary.total_energy,
            summary.total_revenue,
            wall,
            metrics_path.display(),
            log_path.display()
        ));
        summaries.push(summary);
    }
    if seeds > 1 {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for s in &summaries {
            writer
                .serialize(s)
                .map_err(|e| CliError::input(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::input(e.to_string()))?;
        write_atomic(&out.join(format!("summary_{}.csv", kind)), &bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EmbedOutput {
    accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<EmbeddingRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<RejectReason>,
}

pub fn cmd_embed(
    config: &ExperimentConfig,
    substrate_path: &Path,
    vn_path: &Path,
    lifetime: f64,
    kind: EmbedderKind,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let profiles = config.profiles();
    let substrate_text = fs::read_to_string(substrate_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {}", substrate_path.display(), e)))?;
    let substrate = read_substrate_brite(&substrate_text, &profiles)?;
    let vn_text = fs::read_to_string(vn_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {}", vn_path.display(), e)))?;
    let graph = read_virtual_brite(&vn_text)?;
    let vnr = Vnr::new(0, graph, 0.0, lifetime)?;
    let swarm = config.embedder.swarm_params()?;
    let result = match kind {
        EmbedderKind::Eapso => embed_eapso(&vnr, &substrate, &swarm, config.seed)?.result,
        EmbedderKind::Greedy => greedy_embed(&vnr, &substrate, swarm.max_hops, swarm.alpha)?,
        EmbedderKind::Distributed => return Err(CliError::input(
            "one-shot embed works on a single substrate file; use simulate for distributed mode"
                .into(),
        )),
    };
    let output = match &result {
        Ok(embedding) => EmbedOutput {
            accepted: true,
            energy: Some(embedding.energy),
            cost: Some(embedding.cost),
            fitness: Some(embedding.fitness),
            embedding: Some(EmbeddingRecord::from_embedding(&vnr.graph, embedding)),
            reason: None,
        },
        Err(reason) => EmbedOutput {
            accepted: false,
            energy: None,
            cost: None,
            fitness: None,
            embedding: None,
            reason: Some(reason.clone()),
        },
    };
    let json = serde_json::to_string_pretty(&output).map_err(|e| CliError::input(e.to_string()))?;
    match out {
        Some(path) => write_atomic(path, json.as_bytes())?,
        None => emit(&format!("{}\n", json)),
    }
    match result {
        Ok(_) => Ok(()),
        Err(reason) => Err(CliError::rejected(reason)),
    }
}

pub fn cmd_report(
    log_path: &Path,
    bucket: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(log_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {}", log_path.display(), e)))?;
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .ok_or_else(|| CliError::input(format!("{}: empty log", log_path.display())))?;
    let mut meta: RunMeta = serde_json::from_str(meta_line)
        .map_err(|e| CliError::input(format!("{}: bad meta line: {}", log_path.display(), e)))?;
    if let Some(width) = bucket {
        if width <= 0.0 {
            return Err(CliError::input("--bucket must be positive".into()));
        }
        meta.bucket_width = width;
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: VnrLogEntry = serde_json::from_str(line).map_err(|e| {
            CliError::input(format!("{} line {}: {}", log_path.display(), i + 2, e))
        })?;
        entries.push(entry);
    }
    let series = metrics_from_log(&meta, &entries);

    let accepted = entries.iter().filter(|e| e.accepted).count();
    let acceptance = if entries.is_empty() {
        0.0
    } else {
        accepted as f64 / entries.len() as f64
    };
    let mut table = String::new();
    table.push_str(&format!(
        "run: embedder={} seed={} nodes={} links={} bucket={}\n",
        meta.embedder, meta.seed, meta.n_nodes, meta.n_links, meta.bucket_width
    ));
    table.push_str(&format!(
        "requests: {} arrived, {} accepted, acceptance {:.3}\n\n",
        entries.len(),
        accepted,
        acceptance
    ));
    table.push_str(&format!(
        "{:>10} {:>8} {:>10} {:>12} {:>12} {:>8} {:>12} {:>12} {:>10}\n",
        "bucket",
        "arrived",
        "accept_cum",
        "energy",
        "revenue",
        "rc_cum",
        "avail_cpu",
        "avail_bw",
        "embed_ms"
    ));
    for b in &series.buckets {
        table.push_str(&format!(
            "{:>10} {:>8} {:>10.3} {:>12.1} {:>12.1} {:>8.4} {:>12.2} {:>12.2} {:>10.2}\n",
            b.bucket_start,
            b.arrived_cum,
            b.acceptance_cum,
            b.energy_bucket,
            b.revenue_bucket,
            b.rc_cum,
            b.avail_cpu_mean,
            b.avail_bw_mean,
            b.embed_ms_mean,
        ));
    }
    emit(&table);

    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_atomic(&dir.join("report.csv"), &metrics_csv(&series)?)?;
        write_atomic(&dir.join("report.txt"), table.as_bytes())?;
        emit(&format!(
            "\nwrote report.csv and report.txt to {}\n",
            dir.display()
        ));
    }
    Ok(())
}
