use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{LdaConfig, LdaError, TopicModel};

const MAGIC: &[u8; 8] = b"CSPNLDA\0";
const VERSION: u32 = 1;

/// Layout, all integers and floats little-endian:
///
/// ```text
/// magic[8] version:u32 config_len:u32 config_json[config_len]
/// n_topics:u32 n_terms:u32 updates_seen:u64
/// n_terms × (len:u32 utf8[len])      -- in index order
/// n_topics × n_terms × f64           -- lambda, row-major
/// ```
pub fn write_model<W: Write>(model: &TopicModel, mut out: W) -> Result<(), LdaError> {
    let cfg = serde_json::to_vec(&model.config).map_err(|e| LdaError::Format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(cfg.len() as u32).to_le_bytes())?;
    out.write_all(&cfg)?;
    out.write_all(&(model.n_topics() as u32).to_le_bytes())?;
    out.write_all(&(model.n_terms() as u32).to_le_bytes())?;
    out.write_all(&model.updates_seen.to_le_bytes())?;
    let mut terms: Vec<(&String, usize)> = model.vocab.iter().map(|(t, &i)| (t, i)).collect();
    terms.sort_by_key(|&(_, i)| i);
    for (t, _) in terms {
        out.write_all(&(t.len() as u32).to_le_bytes())?;
        out.write_all(t.as_bytes())?;
    }
    for x in model.lambda() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], LdaError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => LdaError::Format("truncated file".into()),
        _ => LdaError::Io(e),
    })?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, LdaError> {
    read_array::<4, _>(r).map(u32::from_le_bytes)
}

fn read_bytes<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, LdaError> {
    let mut buf = Vec::new();
    r.take(n as u64).read_to_end(&mut buf)?;
    if buf.len() != n {
        return Err(LdaError::Format("truncated file".into()));
    }
    Ok(buf)
}

pub fn read_model<R: Read>(mut input: R) -> Result<TopicModel, LdaError> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(LdaError::Format("not an LDA model file".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(LdaError::Format(format!("unsupported version {version}")));
    }
    let cfg_len = read_u32(&mut input)? as usize;
    let config: LdaConfig = serde_json::from_slice(&read_bytes(&mut input, cfg_len)?)
        .map_err(|e| LdaError::Format(format!("config: {e}")))?;
    let k = read_u32(&mut input)? as usize;
    let v = read_u32(&mut input)? as usize;
    let updates_seen = u64::from_le_bytes(read_array::<8, _>(&mut input)?);
    if k != config.n_topics {
        return Err(LdaError::Format("topic count disagrees with config".into()));
    }
    let mut vocab = BTreeMap::new();
    for i in 0..v {
        let len = read_u32(&mut input)? as usize;
        let term = String::from_utf8(read_bytes(&mut input, len)?)
            .map_err(|_| LdaError::Format("term is not UTF-8".into()))?;
        if vocab.insert(term, i).is_some() {
            return Err(LdaError::Format("duplicate term".into()));
        }
    }
    let raw = read_bytes(&mut input, k * v * 8)?;
    let lambda: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if lambda.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(LdaError::Format("lambda entries must be positive".into()));
    }
    Ok(TopicModel::from_parts(vocab, config, updates_seen, lambda))
}

/// Reads `key = value` lines into a config, starting from the defaults.
/// Blank lines and `#` comments are skipped; unknown keys are errors.
pub fn parse_config_file(text: &str) -> Result<LdaConfig, LdaError> {
    let mut cfg = LdaConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| LdaError::BadConfig(format!("line {}: {m}", n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        macro_rules! num {
            () => {
                value.parse().map_err(|_| bad(format!("bad value for {key}: {value}")))?
            };
        }
        match key {
            "n_topics" | "k" => cfg.n_topics = num!(),
            "kappa" => cfg.kappa = num!(),
            "tau0" => cfg.tau0 = num!(),
            "min_df" => cfg.min_df = num!(),
            "max_df" => cfg.max_df = num!(),
            "batch_size" => cfg.batch_size = num!(),
            "alpha" => cfg.alpha = Some(num!()),
            "eta" => cfg.eta = Some(num!()),
            "seed" => cfg.seed = num!(),
            "passes" => cfg.passes = num!(),
            "e_step_tol" => cfg.e_step_tol = num!(),
            "e_step_max_iter" => cfg.e_step_max_iter = num!(),
            _ => return Err(bad(format!("unknown key {key}"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::fit_online;
    use crate::preprocess::TokenSequence;

    fn model() -> TopicModel {
        let docs: Vec<TokenSequence> =
            ["a b c", "c d", "a a e", "d e f"].iter().map(|s| s.split_whitespace().collect()).collect();
        fit_online(&docs, &LdaConfig { n_topics: 3, seed: 9, ..Default::default() }).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = model();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        assert!(matches!(read_model(&buf[..buf.len() - 3]), Err(LdaError::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_model(bad.as_slice()), Err(LdaError::Format(_))));
        let mut bad = buf;
        bad[8] = 7;
        assert!(matches!(read_model(bad.as_slice()), Err(LdaError::Format(_))));
    }

    #[test]
    fn config_file() {
        let cfg = parse_config_file("# best dev run\nn_topics = 95\nmin_df=10\nmax_df = 0.99\nkappa=0.5\ntau0 = 768\n")
            .unwrap();
        assert_eq!((cfg.n_topics, cfg.min_df, cfg.max_df, cfg.kappa, cfg.tau0), (95, 10, 0.99, 0.5, 768.0));
        assert!(parse_config_file("bogus = 1").is_err());
        assert!(parse_config_file("kappa = x").is_err());
        assert!(parse_config_file("kappa = 0.2").is_err());
        assert!(parse_config_file("n_topics 4").is_err());
    }
}
