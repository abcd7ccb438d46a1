unsigned count_bits(unsigned v) {
  unsigned c = 0;
  while (v) {
    c += v & 1u;
    v >>= 1;
  }
  return c;
}
