int sys_lseek(fd_t fd, off_t offset) {
    struct proc *proc;

    if (fd >= NOFILE)
        return -EBADF;
    if (offset < 0)
        return -EINVAL;

    proc = get_proc(current);
    proc->offs[fd] = offset;
    return 0;
}
