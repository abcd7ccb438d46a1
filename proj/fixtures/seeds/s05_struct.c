struct point {
  int x;
  int y;
};
int manhattan(struct point *p) {
  if (p->x < 0) return -p->x + p->y;
  return p->x + p->y;
}
