use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rise_core::io::{DataError, EmbeddingCache, PairRecord, ProviderClient, ProviderConfig};
use serde::Deserialize;

use super::Context;
use crate::cli::EmbedArgs;
use crate::config::DEFAULT_CACHE_DIR;
use crate::error::{CliError, CliResult};
use crate::manifest::Recorder;

#[derive(Debug, Deserialize)]
struct TextPair {
    id: String,
    language: String,
    phenomenon: String,
    neutral_text: String,
    variant_text: String,
}

fn read_text_pairs(path: &Path) -> CliResult<Vec<TextPair>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| DataError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn provider_config(ctx: &Context, args: &EmbedArgs) -> CliResult<ProviderConfig> {
    let mut cfg = match (ctx.file.provider.clone(), &args.endpoint) {
        (_, Some(url)) => {
            let base = ctx.file.provider.clone();
            let model = args
                .model_id
                .clone()
                .or_else(|| base.as_ref().map(|b| b.model_id.clone()))
                .or_else(|| ctx.file.model_id.clone())
                .ok_or_else(|| CliError::Usage("embedding needs --model-id or [provider].model_id".into()))?;
            match base {
                Some(b) => ProviderConfig {
                    endpoint_url: url.clone(),
                    model_id: model,
                    ..b
                },
                None => ProviderConfig::new(url.clone(), model),
            }
        }
        (Some(cfg), None) => cfg,
        (None, None) => {
            return Err(CliError::Usage(
                "no provider: pass --endpoint or add a [provider] section to the config".into(),
            ))
        }
    };
    if let Some(model) = &args.model_id {
        cfg.model_id = model.clone();
    }
    if let Some(var) = &args.token_env {
        cfg.auth_token_env_var = Some(var.clone());
    }
    Ok(cfg)
}

pub fn run(ctx: &Context, args: EmbedArgs) -> CliResult<()> {
    let cfg = provider_config(ctx, &args)?;
    let cache_dir: Option<PathBuf> = (!args.no_cache).then(|| {
        args.cache_dir
            .clone()
            .or_else(|| ctx.file.cache_dir.clone())
            .unwrap_or_else(|| DEFAULT_CACHE_DIR.into())
    });
    let mut rec = Recorder::new(
        "embed",
        serde_json::json!({ "provider": cfg, "cache_dir": cache_dir }),
        None,
    );
    rec.input(&args.input)?;

    let items = read_text_pairs(&args.input)?;
    let texts: Vec<String> = items
        .iter()
        .flat_map(|t| [t.neutral_text.clone(), t.variant_text.clone()])
        .collect();
    let mut client = ProviderClient::new(cfg);
    if let Some(dir) = cache_dir {
        client = client.with_cache(EmbeddingCache::new(dir));
    }
    let vectors = client.embed(&texts)?;
    eprintln!("embedded {} texts for {} pairs", texts.len(), items.len());

    let file = std::fs::File::create(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut w = BufWriter::new(file);
    let mut vectors = vectors.into_iter();
    for t in items {
        let (n, v) = (vectors.next().expect("two per pair"), vectors.next().expect("two per pair"));
        let rec = PairRecord {
            id: t.id,
            language: t.language,
            phenomenon: t.phenomenon,
            neutral_text: Some(t.neutral_text),
            variant_text: Some(t.variant_text),
            neutral_embedding: n,
            variant_embedding: v,
        };
        serde_json::to_writer(&mut w, &rec).expect("record serializes");
        w.write_all(b"\n").map_err(|e| CliError::io(&args.out, e))?;
    }
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    rec.output(&args.out)?;
    rec.finish(ctx.manifest.as_deref())
}
