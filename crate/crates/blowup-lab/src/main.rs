use blowup_lab::cli;

fn main() {
    std::process::exit(cli::run());
}
