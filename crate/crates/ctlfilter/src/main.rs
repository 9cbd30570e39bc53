fn main() {
    std::process::exit(ctlfilter::run(std::env::args_os()));
}
