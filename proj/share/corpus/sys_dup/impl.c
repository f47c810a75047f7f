int sys_dup(fd_t fd, fd_t newfd) {
    struct proc *proc;

    if (!is_fd_valid(fd))
        return -EBADF;
    if (newfd >= NOFILE)
        return -EBADF;
    proc = get_proc(current);
    if (proc->offs[newfd] != 0)
        return -EBUSY;

    proc->offs[newfd] = proc->offs[fd];
    return 0;
}
