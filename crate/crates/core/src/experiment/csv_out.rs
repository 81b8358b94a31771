use super::{Protocol, ResultRow, RowKind};
use crate::error::{execution, Result};
use std::io::Write;

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn has_lambda(protocol: Protocol) -> bool {
    matches!(protocol, Protocol::Independence | Protocol::IndependenceOneWay)
}

/// Full experiment CSV; `lambda_mean` appears for independence protocols.
pub fn write_experiment_csv<W: Write>(rows: &[ResultRow], protocol: Protocol, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "cell",
        "n",
        "m",
        "t",
        "eps",
        "k",
        "kind",
        "trial",
        "instance",
        "verdict",
        "success",
        "plaintext_bits",
        "secure_bits",
    ];
    if has_lambda(protocol) {
        header.push("lambda_mean");
    }
    header.push("reason");
    let err = |e: csv::Error| execution(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let c = &r.cell;
        let mut rec = vec![
            c.index.to_string(),
            c.n.to_string(),
            opt(c.m),
            c.t.to_string(),
            c.eps.to_string(),
            opt(c.k),
            r.kind.as_str().to_string(),
            opt(r.trial),
            r.instance.to_string(),
            opt(r.verdict),
            opt(r.success),
            opt(r.plaintext_bits),
            opt(r.secure_bits),
        ];
        if has_lambda(protocol) {
            rec.push(opt(r.lambda_mean));
        }
        rec.push(r.reason.clone());
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| execution(format!("writing CSV: {e}")))
}

/// Per-trial CSV `trial,instance,verdict,plaintext_bits,secure_bits`, plus
/// `lambda_mean` for independence protocols.
pub fn trial_csv(rows: &[ResultRow], protocol: Protocol) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["trial", "instance", "verdict", "plaintext_bits", "secure_bits"];
    if has_lambda(protocol) {
        header.push("lambda_mean");
    }
    w.write_record(&header).expect("in-memory CSV");
    for r in rows.iter().filter(|r| r.kind == RowKind::Trial) {
        let mut rec =
            vec![opt(r.trial), r.instance.to_string(), opt(r.verdict), opt(r.plaintext_bits), opt(r.secure_bits)];
        if has_lambda(protocol) {
            rec.push(opt(r.lambda_mean));
        }
        w.write_record(&rec).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}
