int clz_or_zero(unsigned x) {
  if (x == 0) return 0;
  return __builtin_clz(x);
}
