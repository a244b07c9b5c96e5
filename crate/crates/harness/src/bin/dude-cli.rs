fn main() {
    std::process::exit(dude_harness::cli_main(std::env::args_os()));
}
