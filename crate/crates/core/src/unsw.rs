//! Layout of the partitioned UNSW-NB15 CSVs and a seeded surrogate
//! generator that produces tables with the same header.
//!
//! The surrogate is not the dataset. It mimics the column layout, the
//! nominal columns, the class balance and the broad redundancy structure
//! (byte counts tracking packet counts, TCP timing components tracking
//! their sum, connection counters tracking each other) so that the whole
//! pipeline can be exercised without the real file.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::RawRecordTable;

/// Header of `UNSW_NB15_training-set.csv` / `UNSW_NB15_testing-set.csv`.
pub const COLUMNS: [&str; 45] = [
    "id",
    "dur",
    "proto",
    "service",
    "state",
    "spkts",
    "dpkts",
    "sbytes",
    "dbytes",
    "rate",
    "sttl",
    "dttl",
    "sload",
    "dload",
    "sloss",
    "dloss",
    "sinpkt",
    "dinpkt",
    "sjit",
    "djit",
    "swin",
    "stcpb",
    "dtcpb",
    "dwin",
    "tcprtt",
    "synack",
    "ackdat",
    "smean",
    "dmean",
    "trans_depth",
    "response_body_len",
    "ct_srv_src",
    "ct_state_ttl",
    "ct_dst_ltm",
    "ct_src_dport_ltm",
    "ct_dst_sport_ltm",
    "ct_dst_src_ltm",
    "is_ftp_login",
    "ct_ftp_cmd",
    "ct_flw_http_method",
    "ct_src_ltm",
    "ct_srv_dst",
    "is_sm_ips_ports",
    "attack_cat",
    "label",
];

/// Feature columns left after removing `id`, `attack_cat` and `label`.
pub const FEATURE_COUNT: usize = 42;

/// Rows in the training CSV.
pub const TRAINING_ROWS: usize = 175_341;

pub const NOMINAL_COLUMNS: [&str; 3] = ["proto", "service", "state"];

/// The published 17 columns removed at threshold 0.85, spelled as in the
/// CSV header (`ackdat` rather than `ack-dat`).
pub const PUBLISHED_DROPPED: [&str; 17] = [
    "ct_srv_dst",
    "synack",
    "ct_src_dport_ltm",
    "is_sm_ips_ports",
    "dwin",
    "sloss",
    "ct_dst_src_ltm",
    "sbytes",
    "ct_src_ltm",
    "ct_dst_sport_ltm",
    "dloss",
    "dbytes",
    "ackdat",
    "ct_ftp_cmd",
    "proto",
    "state",
    "service",
];

/// Where to get the real file.
pub const ACQUISITION: &str = "\
The UNSW-NB15 dataset is not bundled. Download the partitioned training set
(UNSW_NB15_training-set.csv, 175,341 rows, 45 columns) from the UNSW Canberra
Cyber Range Lab dataset page (https://research.unsw.edu.au/projects/unsw-nb15-dataset)
and point `dataset.path` at it. Set `dataset.sha256` to have the file verified.";

const ATTACK_CATS: [&str; 9] = [
    "Fuzzers",
    "Analysis",
    "Backdoor",
    "DoS",
    "Exploits",
    "Generic",
    "Reconnaissance",
    "Shellcode",
    "Worms",
];

struct Gen(ChaCha8Rng);

impl Gen {
    fn unit(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    fn exp(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.unit()).ln()
    }

    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn count(&mut self, mean: f64) -> f64 {
        self.exp(mean).floor()
    }

    fn pick<'a>(&mut self, items: &[(&'a str, f64)]) -> &'a str {
        let total: f64 = items.iter().map(|i| i.1).sum();
        let mut u = self.unit() * total;
        for &(name, w) in items {
            if u < w {
                return name;
            }
            u -= w;
        }
        items[items.len() - 1].0
    }

    fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

fn fmt(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

/// Generates `rows` UNSW-shaped records. Roughly 68% are attacks, as in
/// the real training set.
pub fn surrogate(rows: usize, seed: u64) -> RawRecordTable {
    let mut g = Gen(ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(rows);
    for id in 1..=rows {
        let attack = g.chance(0.68);
        let proto = if attack {
            g.pick(&[("udp", 0.35), ("tcp", 0.35), ("unas", 0.15), ("arp", 0.05), ("ospf", 0.1)])
        } else {
            g.pick(&[("tcp", 0.6), ("udp", 0.35), ("arp", 0.05)])
        };
        let tcp = proto == "tcp";
        let service = if attack {
            g.pick(&[("-", 0.5), ("dns", 0.3), ("http", 0.12), ("ftp", 0.04), ("smtp", 0.04)])
        } else {
            g.pick(&[("-", 0.45), ("http", 0.2), ("dns", 0.15), ("ftp", 0.1), ("smtp", 0.05), ("ftp-data", 0.05)])
        };
        let state = if tcp {
            if attack {
                g.pick(&[("FIN", 0.7), ("REQ", 0.2), ("RST", 0.1)])
            } else {
                g.pick(&[("FIN", 0.85), ("CON", 0.1), ("RST", 0.05)])
            }
        } else if attack {
            g.pick(&[("INT", 0.9), ("CON", 0.1)])
        } else {
            g.pick(&[("CON", 0.6), ("INT", 0.4)])
        };

        let dur = if attack { g.exp(0.3) } else { g.exp(1.2) };
        let spkts = 1.0 + if attack { g.count(6.0) } else { g.count(25.0) };
        let dpkts = if attack && !tcp {
            0.0
        } else {
            (0.5 * spkts + g.count(if attack { 3.0 } else { 14.0 })).floor()
        };
        let sbytes = (spkts * 110.0 * (1.0 + 0.08 * g.normal())).abs().floor() + 40.0;
        let dbytes = (dpkts * 420.0 * (1.0 + 0.08 * g.normal())).abs().floor();
        let rate = (spkts + dpkts) / (dur + 0.5) * (1.0 + 0.5 * g.unit());
        let sttl = if attack {
            if g.chance(0.85) { 254.0 } else { 62.0 }
        } else if g.chance(0.8) {
            31.0
        } else {
            62.0
        };
        let dttl = if attack {
            if g.chance(0.75) { 0.0 } else { 252.0 }
        } else if g.chance(0.8) {
            29.0
        } else {
            252.0
        };
        let sload = 8.0 * sbytes / (dur + 0.05) * (0.2 + g.unit());
        let dload = 8.0 * dbytes / (dur + 0.05) * (0.2 + g.unit());
        let sloss = (spkts * 0.12 + 0.4 * g.normal()).max(0.0).floor();
        let dloss = (dpkts * 0.12 + 0.4 * g.normal()).max(0.0).floor();
        let is_sm = g.chance(0.01);
        let sinpkt = if is_sm {
            60_000.0 + 500.0 * g.unit()
        } else {
            1000.0 * dur / spkts * g.unit()
        };
        let dinpkt = if dpkts > 0.0 {
            1000.0 * dur / dpkts * (0.5 + g.unit())
        } else {
            0.0
        };
        let sjit = sinpkt.min(5000.0) * g.exp(1.0);
        let djit = dinpkt * g.exp(1.0);
        let swin = if tcp { 255.0 } else { 0.0 };
        let dwin = if tcp && !g.chance(0.03) { 255.0 } else { 0.0 };
        let stcpb = if tcp { (g.unit() * 4.29e9).floor() } else { 0.0 };
        let dtcpb = if tcp { (g.unit() * 4.29e9).floor() } else { 0.0 };
        let (tcprtt, synack, ackdat) = if tcp {
            let rtt = g.exp(0.06);
            let syn = rtt * (0.55 + 0.05 * g.normal()).clamp(0.3, 0.8);
            (rtt, syn, rtt - syn)
        } else {
            (0.0, 0.0, 0.0)
        };
        let smean = (sbytes / spkts).floor();
        let dmean = if dpkts > 0.0 { (dbytes / dpkts).floor() } else { 0.0 };
        let http = service == "http";
        let trans_depth = if http { 1.0 } else { 0.0 };
        let response_body_len = if http { g.count(3000.0) } else { 0.0 };
        let ct_srv_src = 1.0 + if attack { g.count(14.0) } else { g.count(4.0) };
        let ct_state_ttl = if attack && sttl == 254.0 {
            g.pick(&[("2", 0.6), ("3", 0.2), ("1", 0.2)]).parse().unwrap()
        } else if attack || g.chance(0.2) {
            1.0
        } else {
            0.0
        };
        let ct_dst_ltm = 1.0 + if attack { g.count(9.0) } else { g.count(3.0) };
        let near = |g: &mut Gen, base: f64| (base * (0.9 + 0.2 * g.unit()) + g.count(0.6)).floor().max(1.0);
        let ct_src_dport_ltm = near(&mut g, ct_dst_ltm);
        let ct_dst_sport_ltm = near(&mut g, ct_dst_ltm);
        let ct_dst_src_ltm = near(&mut g, ct_dst_ltm);
        let ftp = service == "ftp";
        let is_ftp_login = if ftp && g.chance(0.9) { 1.0 } else { 0.0 };
        let ct_ftp_cmd = if is_ftp_login > 0.0 && g.chance(0.1) {
            2.0
        } else {
            is_ftp_login
        };
        let ct_flw_http_method = if http { (g.unit() * 4.0).floor() } else { 0.0 };
        let ct_src_ltm = near(&mut g, ct_dst_ltm);
        let ct_srv_dst = near(&mut g, ct_srv_src);
        let attack_cat = if attack {
            ATTACK_CATS[(g.unit() * ATTACK_CATS.len() as f64) as usize]
        } else {
            "Normal"
        };

        let numeric = [
            dur, spkts, dpkts, sbytes, dbytes, rate, sttl, dttl, sload, dload, sloss, dloss,
            sinpkt, dinpkt, sjit, djit, swin, stcpb, dtcpb, dwin, tcprtt, synack, ackdat, smean,
            dmean, trans_depth, response_body_len, ct_srv_src, ct_state_ttl, ct_dst_ltm,
            ct_src_dport_ltm, ct_dst_sport_ltm, ct_dst_src_ltm, is_ftp_login, ct_ftp_cmd,
            ct_flw_http_method, ct_src_ltm, ct_srv_dst,
        ];
        let mut row = Vec::with_capacity(COLUMNS.len());
        row.push(id.to_string());
        row.push(fmt(dur));
        row.extend([proto, service, state].map(str::to_string));
        row.extend(numeric[1..].iter().map(|&v| fmt(v)));
        row.push(u8::from(is_sm).to_string());
        row.push(attack_cat.to_string());
        row.push(u8::from(attack).to_string());
        debug_assert_eq!(row.len(), COLUMNS.len());
        out.push(row);
    }
    RawRecordTable {
        header: COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: out,
        source_path: PathBuf::from(format!("<surrogate rows={rows} seed={seed}>")),
    }
}

/// Writes a table as RFC-4180 CSV.
pub fn write_csv(table: &RawRecordTable, path: &std::path::Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
