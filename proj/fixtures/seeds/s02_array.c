int a[10];
int sum(void) {
  int s = 0;
  for (int i = 0; i < 10; i++) s += a[i];
  return s;
}
