//! Serves the ops console API over a fresh pipeline run.
//!
//! ```text
//! cargo run --example ops_console -- [port]
//! curl localhost:8080/api/plants
//! curl 'localhost:8080/api/risk?plant=A&from=2025-01-01'
//! curl -X POST localhost:8080/api/whatif -H 'content-type: application/json' \
//!      -d '{"r_watch": 0.2, "r_action": 0.05}'
//! ```

use rednet::console::{serve, ConsoleApi, WhatIfRequest};
use rednet::pipeline::{run_pipeline, RunConfig};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args()
        .nth(1)
        .map(|p| p.parse())
        .transpose()?
        .unwrap_or(8080);
    let cfg = RunConfig {
        out_dir: std::env::temp_dir().join("rednet-console-example"),
        ..RunConfig::default()
    };
    run_pipeline(&cfg)?;
    let api = ConsoleApi::load(&cfg.out_dir)?;

    let t = api.thresholds();
    println!(
        "live thresholds: WATCH {:.4}  ACTION {:.4}",
        t.tau_watch, t.tau_action
    );
    let stricter = api
        .whatif(&WhatIfRequest {
            r_watch: Some(0.10),
            r_action: Some(0.02),
            ..WhatIfRequest::default()
        })
        .map_err(|e| format!("{e:?}"))?;
    println!(
        "what-if 10% / 2%: WATCH {:.4}  ACTION {:.4}",
        stricter.thresholds.tau_watch, stricter.thresholds.tau_action
    );

    let addr = ([127, 0, 0, 1], port).into();
    serve(api, addr, |a| println!("listening on http://{a}")).await?;
    Ok(())
}
