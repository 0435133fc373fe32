use std::net::{Ipv4Addr, SocketAddr};
use std::process::ExitCode;

use metric_elicit::config::{Config, Task};
use metric_elicit::{service, tasks};

fn main() -> ExitCode {
    let config = match Config::from_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            // clap renders help and version through the error path.
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return if clap_err.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
            }
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let run = || -> anyhow::Result<()> {
        if config.task == Task::Serve {
            let rt = tokio::runtime::Runtime::new()?;
            return rt.block_on(service::serve(SocketAddr::from((Ipv4Addr::LOCALHOST, config.port))));
        }
        for path in tasks::run_task(&config)? {
            println!("{}", path.display());
        }
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
