extern int vfork();
void f() { vfork(); }
