fn main() {
    std::process::exit(meandim_core::cli::main_entry(std::env::args_os()));
}
