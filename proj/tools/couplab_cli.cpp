// Experiment runner; full implementation lands with the suites module.
int main() { return 0; }
